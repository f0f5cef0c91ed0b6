#pragma once

#include "sbfc/bundled.hpp"
#include "sbfc/dataio.hpp"
#include "sbfc/error.hpp"
#include "sbfc/graph.hpp"
#include "sbfc/inference.hpp"
#include "sbfc/random.hpp"
#include "sbfc/sampler.hpp"
#include "sbfc/score.hpp"
