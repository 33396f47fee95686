#pragma once

#include "stirring/adjoint.hpp"
#include "stirring/basis.hpp"
#include "stirring/errors.hpp"
#include "stirring/forward.hpp"
#include "stirring/geometry.hpp"
#include "stirring/interface.hpp"
#include "stirring/metrics.hpp"
#include "stirring/optimizer.hpp"
#include "stirring/parallel.hpp"
#include "stirring/transport.hpp"
