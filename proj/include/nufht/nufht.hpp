#ifndef NUFHT_NUFHT_HPP
#define NUFHT_NUFHT_HPP

// Everything in one include.

#include "nufht/apps.hpp"
#include "nufht/bounds.hpp"
#include "nufht/errors.hpp"
#include "nufht/expansions.hpp"
#include "nufht/experiments.hpp"
#include "nufht/fft.hpp"
#include "nufht/io.hpp"
#include "nufht/nufft.hpp"
#include "nufht/partition.hpp"
#include "nufht/special.hpp"
#include "nufht/transform.hpp"

#endif  // NUFHT_NUFHT_HPP
