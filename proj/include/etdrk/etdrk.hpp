#pragma once

#include "etdrk/config.hpp"
#include "etdrk/diagnostics.hpp"
#include "etdrk/errors.hpp"
#include "etdrk/grid.hpp"
#include "etdrk/harness.hpp"
#include "etdrk/phi.hpp"
#include "etdrk/polynomial.hpp"
#include "etdrk/potentials.hpp"
#include "etdrk/scheme.hpp"
#include "etdrk/spectral.hpp"
#include "etdrk/stepper.hpp"
