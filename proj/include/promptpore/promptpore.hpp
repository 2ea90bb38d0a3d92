#pragma once

#include "promptpore/backend.hpp"
#include "promptpore/centroid_store.hpp"
#include "promptpore/cluster.hpp"
#include "promptpore/components.hpp"
#include "promptpore/distance.hpp"
#include "promptpore/errors.hpp"
#include "promptpore/eval.hpp"
#include "promptpore/geometry.hpp"
#include "promptpore/image.hpp"
#include "promptpore/log.hpp"
#include "promptpore/model_backend.hpp"
#include "promptpore/pipeline.hpp"
#include "promptpore/png_io.hpp"
#include "promptpore/prompt_set.hpp"
#include "promptpore/prompts.hpp"
#include "promptpore/random.hpp"
#include "promptpore/synth.hpp"
#include "promptpore/threshold.hpp"
