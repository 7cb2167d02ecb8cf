#pragma once

/** \file mmrfuse.hpp
 *  \brief Umbrella header for the fusion engine.
 */

#include "mmrfuse/config.hpp"
#include "mmrfuse/corpus.hpp"
#include "mmrfuse/dbow.hpp"
#include "mmrfuse/diagnostics.hpp"
#include "mmrfuse/fetch.hpp"
#include "mmrfuse/fused.hpp"
#include "mmrfuse/lda.hpp"
#include "mmrfuse/mmr.hpp"
#include "mmrfuse/pipeline.hpp"
#include "mmrfuse/random.hpp"
#include "mmrfuse/rouge.hpp"
#include "mmrfuse/run_io.hpp"
#include "mmrfuse/similarity.hpp"
#include "mmrfuse/textproc.hpp"
#include "mmrfuse/transport.hpp"
#include "mmrfuse/tuner.hpp"
#include "mmrfuse/types.hpp"
#include "mmrfuse/vectors.hpp"
#include "mmrfuse/wmd.hpp"
