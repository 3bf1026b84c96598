#pragma once

#include "canonical.hpp"
#include "chain_analysis.hpp"
#include "core_model.hpp"
#include "parallel.hpp"
#include "phase.hpp"
#include "random.hpp"
#include "report.hpp"
#include "simulate.hpp"
#include "state_set.hpp"
#include "theory.hpp"
#include "transitions.hpp"
#include "verifier.hpp"
