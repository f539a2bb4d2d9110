#pragma once

#include "gnn/catalog.hpp"
#include "gnn/domain.hpp"
#include "gnn/driver.hpp"
#include "gnn/forms.hpp"
#include "gnn/galerkin.hpp"
#include "gnn/linalg.hpp"
#include "gnn/network.hpp"
#include "gnn/quadrature.hpp"
#include "gnn/schedules.hpp"
#include "gnn/training.hpp"
