#pragma once

#include "brownian.hpp"
#include "coeffs.hpp"
#include "config.hpp"
#include "drift_removal.hpp"
#include "em.hpp"
#include "errors.hpp"
#include "estimators.hpp"
#include "exact_sum.hpp"
#include "harness.hpp"
#include "normal.hpp"
#include "philox.hpp"
#include "quadrature.hpp"
#include "rate_fit.hpp"
#include "singular_set.hpp"
#include "yamada_watanabe.hpp"
