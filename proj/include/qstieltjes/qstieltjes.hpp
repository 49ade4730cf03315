#pragma once

// Umbrella header for the library (the CLI layer lives in cli.hpp).

#include "checks.hpp"
#include "context.hpp"
#include "errors.hpp"
#include "families.hpp"
#include "functionals.hpp"
#include "lattice_poly.hpp"
#include "orthopoly.hpp"
#include "qcore.hpp"
#include "qhyper.hpp"
#include "report.hpp"
#include "scalar.hpp"
#include "stieltjes.hpp"
