#pragma once

#include "anigrowth/anisotropy_tests.hpp"
#include "anigrowth/circular.hpp"
#include "anigrowth/core.hpp"
#include "anigrowth/descriptive.hpp"
#include "anigrowth/io.hpp"
#include "anigrowth/minutiae.hpp"
#include "anigrowth/procrustes.hpp"
#include "anigrowth/simulation.hpp"
#include "anigrowth/sweep.hpp"
