#pragma once

// Cross-lingual biomedical entity linking toolkit: self-aligned name
// encoders trained on synonym and translation data, exact nearest-neighbour
// linking against an ontology, and the benchmark construction pipeline.

#include "xsap/benchmark.hpp"
#include "xsap/bitext.hpp"
#include "xsap/core.hpp"
#include "xsap/encoder.hpp"
#include "xsap/linker.hpp"
#include "xsap/mining.hpp"
#include "xsap/ms_loss.hpp"
#include "xsap/rrf.hpp"
#include "xsap/train.hpp"
