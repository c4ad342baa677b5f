#pragma once

#include "polglrt/errors.hpp"
#include "polglrt/geometry.hpp"
#include "polglrt/hermitian_eigen.hpp"
#include "polglrt/target_model.hpp"
#include "polglrt/scene.hpp"
#include "polglrt/forward_model.hpp"
#include "polglrt/noise_model.hpp"
#include "polglrt/detector.hpp"
#include "polglrt/stats.hpp"
#include "polglrt/parallel.hpp"
#include "polglrt/mc_harness.hpp"
#include "polglrt/config.hpp"
#include "polglrt/csv.hpp"

#define POLGLRT_VERSION "0.1.0"
