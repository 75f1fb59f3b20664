#pragma once

// Umbrella header for the simulation and criteria library.

#include "cmj/cmj_process.hpp"
#include "cmj/criteria.hpp"
#include "cmj/errors.hpp"
#include "cmj/fitness.hpp"
#include "cmj/pure_birth.hpp"
#include "cmj/random.hpp"
#include "cmj/recursive_tree.hpp"
#include "cmj/sequence_plan.hpp"
#include "cmj/stats.hpp"
#include "cmj/weighted_sampler.hpp"
#include "cmj/weights.hpp"
