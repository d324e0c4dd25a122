#pragma once

#include "mccs/cxt_io.hpp"
#include "mccs/error.hpp"
#include "mccs/metrics.hpp"
#include "mccs/model.hpp"
#include "mccs/prox.hpp"
#include "mccs/recon.hpp"
#include "mccs/rng.hpp"
#include "mccs/simulator.hpp"
#include "mccs/solvers.hpp"
#include "mccs/tensor.hpp"
#include "mccs/transforms.hpp"
