#pragma once

#include "hyperlattice/error.hpp"
#include "hyperlattice/lattice.hpp"
#include "hyperlattice/scattering.hpp"
#include "hyperlattice/fdsolver.hpp"
#include "hyperlattice/tdtransform.hpp"
#include "hyperlattice/oracle.hpp"
#include "hyperlattice/experiments.hpp"
#include "hyperlattice/compare.hpp"
#include "hyperlattice/io.hpp"
#include "hyperlattice/config.hpp"
