#pragma once

#include "arnlstm/error.hpp"
#include "arnlstm/rng.hpp"
#include "arnlstm/numerics/adam.hpp"
#include "arnlstm/numerics/checkpoint.hpp"
#include "arnlstm/numerics/gradcheck.hpp"
#include "arnlstm/numerics/ops.hpp"
#include "arnlstm/numerics/params.hpp"
#include "arnlstm/relation/relation.hpp"
#include "arnlstm/skeleton/csv.hpp"
#include "arnlstm/skeleton/folds.hpp"
#include "arnlstm/skeleton/modality.hpp"
#include "arnlstm/skeleton/synthetic.hpp"
#include "arnlstm/skeleton/temporal.hpp"
#include "arnlstm/skeleton/topology.hpp"
#include "arnlstm/streams/config.hpp"
#include "arnlstm/streams/model.hpp"
#include "arnlstm/tdlstm/block.hpp"
#include "arnlstm/tdlstm/time_distributed.hpp"
#include "arnlstm/train/metrics.hpp"
#include "arnlstm/train/report.hpp"
#include "arnlstm/train/trainer.hpp"
#include "arnlstm/train/gradient_suite.hpp"
