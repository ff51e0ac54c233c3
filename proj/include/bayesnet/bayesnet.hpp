#ifndef BAYESNET_BAYESNET_HPP_
#define BAYESNET_BAYESNET_HPP_

#include "bayesnet/core.hpp"
#include "bayesnet/error.hpp"
#include "bayesnet/incomplete.hpp"
#include "bayesnet/inference.hpp"
#include "bayesnet/io.hpp"
#include "bayesnet/param_learn.hpp"
#include "bayesnet/scoring.hpp"
#include "bayesnet/search.hpp"

#endif  // BAYESNET_BAYESNET_HPP_
