#pragma once
// Everything in one include.

#include "bfnet/butterfly_reference.hpp"
#include "bfnet/butterflynet.hpp"
#include "bfnet/complex_encoding.hpp"
#include "bfnet/error.hpp"
#include "bfnet/geometry.hpp"
#include "bfnet/imaging.hpp"
#include "bfnet/kernel_math.hpp"
#include "bfnet/matrix.hpp"
#include "bfnet/parallel.hpp"
#include "bfnet/restoration.hpp"
#include "bfnet/serialization.hpp"
#include "bfnet/signal.hpp"
#include "bfnet/training.hpp"
