#pragma once

#include "crackseg/baselines.hpp"
#include "crackseg/bench.hpp"
#include "crackseg/error.hpp"
#include "crackseg/evaluation.hpp"
#include "crackseg/gray_image.hpp"
#include "crackseg/histogram.hpp"
#include "crackseg/imaging.hpp"
#include "crackseg/otsu.hpp"
#include "crackseg/recursive_otsu.hpp"
#include "crackseg/serialize.hpp"
#include "crackseg/synth.hpp"
#include "crackseg/version.hpp"
