#pragma once

#include "sigimg/augment.hpp"
#include "sigimg/classify.hpp"
#include "sigimg/error.hpp"
#include "sigimg/image.hpp"
#include "sigimg/ingest.hpp"
#include "sigimg/parallel.hpp"
#include "sigimg/pipeline.hpp"
#include "sigimg/png_io.hpp"
#include "sigimg/random.hpp"
#include "sigimg/reduce_fuse.hpp"
#include "sigimg/render.hpp"
#include "sigimg/signal.hpp"
#include "sigimg/synth.hpp"
