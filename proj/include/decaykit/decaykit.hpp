#pragma once

#include "decaykit/bivariate.hpp"
#include "decaykit/catalog.hpp"
#include "decaykit/errors.hpp"
#include "decaykit/funcspace.hpp"
#include "decaykit/hypothesis.hpp"
#include "decaykit/numfmt.hpp"
#include "decaykit/odesolve.hpp"
#include "decaykit/pde.hpp"
#include "decaykit/quadrature.hpp"
#include "decaykit/runner.hpp"
#include "decaykit/scenario.hpp"
#include "decaykit/trajectory.hpp"
#include "decaykit/verdict.hpp"
