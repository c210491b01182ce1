#pragma once

#include "bubblecs/errors.hpp"
#include "bubblecs/model.hpp"
#include "bubblecs/prefix_sums.hpp"
#include "bubblecs/estimation.hpp"
#include "bubblecs/emergence.hpp"
#include "bubblecs/collapse.hpp"
#include "bubblecs/recovery.hpp"
#include "bubblecs/critical_values.hpp"
#include "bubblecs/confidence_set.hpp"
#include "bubblecs/montecarlo.hpp"
#include "bubblecs/io.hpp"
