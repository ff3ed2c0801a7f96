#pragma once

#include "erepi/calibration.hpp"
#include "erepi/components.hpp"
#include "erepi/epidemic.hpp"
#include "erepi/error.hpp"
#include "erepi/meanfield.hpp"
#include "erepi/network.hpp"
#include "erepi/rng.hpp"
#include "erepi/stats.hpp"
#include "erepi/svm.hpp"
