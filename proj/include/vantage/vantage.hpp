#pragma once

#include "vantage/core.hpp"
#include "vantage/geometry.hpp"
#include "vantage/mesh_io.hpp"
#include "vantage/voxel.hpp"
#include "vantage/robot.hpp"
#include "vantage/camera.hpp"
#include "vantage/metrics.hpp"
#include "vantage/sampler.hpp"
#include "vantage/optimizer.hpp"
#include "vantage/allocation.hpp"
#include "vantage/model_io.hpp"
#include "vantage/scene.hpp"
#include "vantage/pipeline.hpp"
#include "vantage/export.hpp"
