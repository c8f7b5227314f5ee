#pragma once

// Umbrella header.

#include "assembly.hpp"
#include "core.hpp"
#include "corpus_io.hpp"
#include "de.hpp"
#include "ga.hpp"
#include "metrics.hpp"
#include "parallel.hpp"
#include "pipeline.hpp"
#include "random.hpp"
#include "serialize.hpp"
#include "similarity.hpp"
#include "trace.hpp"
