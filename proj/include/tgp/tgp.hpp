#pragma once

#include "tgp/audit.hpp"
#include "tgp/baselines.hpp"
#include "tgp/drift.hpp"
#include "tgp/error.hpp"
#include "tgp/graph.hpp"
#include "tgp/io.hpp"
#include "tgp/kde.hpp"
#include "tgp/manifest.hpp"
#include "tgp/pipeline.hpp"
#include "tgp/rng.hpp"
#include "tgp/sampler.hpp"
#include "tgp/sparsify.hpp"
#include "tgp/synthetic.hpp"
#include "tgp/tpr.hpp"
#include "tgp/tpr_oracle.hpp"
