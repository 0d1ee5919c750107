#pragma once

#include "angles.hpp"
#include "arm_transmission.hpp"
#include "base_kinematics.hpp"
#include "behavior_engine.hpp"
#include "errors.hpp"
#include "head_projection.hpp"
#include "platform_config.hpp"
#include "raster.hpp"
#include "scenario.hpp"
#include "sensor_geometry.hpp"
#include "text.hpp"
#include "waist_counterbalance.hpp"
