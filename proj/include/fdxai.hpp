#pragma once

// Explaining models trained on functional data: simulated signatures, fPCA,
// feed-forward networks on fPC scores, permutation feature importance and the
// interpretation figures.

#include "fdxai/error.hpp"
#include "fdxai/explain.hpp"
#include "fdxai/fpca.hpp"
#include "fdxai/io.hpp"
#include "fdxai/metrics.hpp"
#include "fdxai/mlp.hpp"
#include "fdxai/parallel.hpp"
#include "fdxai/pipeline.hpp"
#include "fdxai/plot.hpp"
#include "fdxai/random.hpp"
#include "fdxai/sim.hpp"
#include "fdxai/viz.hpp"
