#pragma once

#include "pompkit/abc.hpp"
#include "pompkit/data.hpp"
#include "pompkit/distributions.hpp"
#include "pompkit/error.hpp"
#include "pompkit/log.hpp"
#include "pompkit/mif.hpp"
#include "pompkit/model.hpp"
#include "pompkit/models.hpp"
#include "pompkit/nlf.hpp"
#include "pompkit/optimize.hpp"
#include "pompkit/oracle.hpp"
#include "pompkit/params.hpp"
#include "pompkit/pmcmc.hpp"
#include "pompkit/probes.hpp"
#include "pompkit/rng.hpp"
#include "pompkit/simulate.hpp"
#include "pompkit/smc.hpp"
