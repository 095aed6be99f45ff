#pragma once

#include "dsbs/assignment.hpp"
#include "dsbs/dataset.hpp"
#include "dsbs/datasets.hpp"
#include "dsbs/drift.hpp"
#include "dsbs/errors.hpp"
#include "dsbs/experiment.hpp"
#include "dsbs/gmm.hpp"
#include "dsbs/metrics.hpp"
#include "dsbs/report.hpp"
#include "dsbs/rng.hpp"
#include "dsbs/sampler.hpp"
#include "dsbs/sde.hpp"
