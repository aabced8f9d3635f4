#pragma once

#include "scamr/bench.hpp"
#include "scamr/cache.hpp"
#include "scamr/criteria.hpp"
#include "scamr/cut_model.hpp"
#include "scamr/decomposition.hpp"
#include "scamr/driver.hpp"
#include "scamr/element.hpp"
#include "scamr/elliptic.hpp"
#include "scamr/gpc.hpp"
#include "scamr/grids.hpp"
#include "scamr/legendre.hpp"
#include "scamr/multi_index.hpp"
#include "scamr/types.hpp"
