#pragma once

// Umbrella header.

#include "mcshape/error.hpp"
#include "mcshape/geometry.hpp"
#include "mcshape/image_io.hpp"
#include "mcshape/imaging.hpp"
#include "mcshape/invariants.hpp"
#include "mcshape/json_io.hpp"
#include "mcshape/moments.hpp"
#include "mcshape/oracles.hpp"
#include "mcshape/rng.hpp"
