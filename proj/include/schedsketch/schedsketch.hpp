#ifndef SCHEDSKETCH_HPP
#define SCHEDSKETCH_HPP

#include "core.hpp"
#include "generators.hpp"
#include "input_sketch.hpp"
#include "instance.hpp"
#include "oracles.hpp"
#include "report.hpp"
#include "sampling.hpp"
#include "schedule.hpp"
#include "streaming.hpp"

#endif
