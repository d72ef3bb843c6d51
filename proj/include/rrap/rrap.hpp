#pragma once

#include "rrap/units.hpp"
#include "rrap/error.hpp"
#include "rrap/device_model.hpp"
#include "rrap/trace.hpp"
#include "rrap/energy.hpp"
#include "rrap/cache.hpp"
#include "rrap/refresh.hpp"
#include "rrap/dsi.hpp"
#include "rrap/config.hpp"
#include "rrap/hierarchy.hpp"
#include "rrap/report.hpp"
#include "rrap/synthetic.hpp"
