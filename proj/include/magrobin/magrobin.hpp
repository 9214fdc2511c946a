#pragma once

#include "asymptotics.hpp"
#include "disk_solver.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "hermitian_sparse.hpp"
#include "io.hpp"
#include "optimize.hpp"
#include "perturbation.hpp"
#include "robin_models.hpp"
#include "strip_solver.hpp"
#include "trial_state.hpp"
#include "tridiagonal.hpp"
