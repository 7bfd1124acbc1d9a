#pragma once

#include "fcp/error.hpp"
#include "fcp/fnegbin.hpp"
#include "fcp/fracops.hpp"
#include "fcp/mcsim.hpp"
#include "fcp/pmf_table.hpp"
#include "fcp/specfun.hpp"
#include "fcp/stfpoisson.hpp"
#include "fcp/weighted.hpp"
