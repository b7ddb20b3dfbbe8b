#pragma once

#include "tmatrix/types.hpp"
#include "tmatrix/sequences.hpp"
#include "tmatrix/primes.hpp"
#include "tmatrix/elements.hpp"
#include "tmatrix/method1.hpp"
#include "tmatrix/activeset.hpp"
#include "tmatrix/verifier.hpp"
