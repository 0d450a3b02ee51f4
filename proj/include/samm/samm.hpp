#pragma once

#include "samm/basis.hpp"
#include "samm/csv.hpp"
#include "samm/error.hpp"
#include "samm/estimator.hpp"
#include "samm/kernels.hpp"
#include "samm/linalg.hpp"
#include "samm/locallinear.hpp"
#include "samm/pimax.hpp"
#include "samm/simgen.hpp"
