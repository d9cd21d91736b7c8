#pragma once

#include "perturb/bpe.hpp"
#include "perturb/corpus.hpp"
#include "perturb/errors.hpp"
#include "perturb/experiment.hpp"
#include "perturb/metrics.hpp"
#include "perturb/noise.hpp"
#include "perturb/rng.hpp"
#include "perturb/tagger.hpp"
#include "perturb/unicode.hpp"
