#pragma once

#include "apf/coupling.hpp"
#include "apf/eval.hpp"
#include "apf/filter.hpp"
#include "apf/frame.hpp"
#include "apf/fusion.hpp"
#include "apf/geometry.hpp"
#include "apf/graspability.hpp"
#include "apf/grid.hpp"
#include "apf/io.hpp"
#include "apf/movability.hpp"
#include "apf/rng.hpp"
#include "apf/runner.hpp"
#include "apf/scene.hpp"
#include "apf/volumes.hpp"
