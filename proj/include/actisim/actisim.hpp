#pragma once

#include "actisim/blocks.hpp"
#include "actisim/common.hpp"
#include "actisim/csv.hpp"
#include "actisim/driver.hpp"
#include "actisim/ee.hpp"
#include "actisim/estimator.hpp"
#include "actisim/fft.hpp"
#include "actisim/lte.hpp"
#include "actisim/params.hpp"
#include "actisim/power_library.hpp"
#include "actisim/scenario.hpp"
#include "actisim/sim.hpp"
