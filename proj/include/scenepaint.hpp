#pragma once

#include "scenepaint/core/error.hpp"
#include "scenepaint/core/random.hpp"
#include "scenepaint/core/binary_io.hpp"
#include "scenepaint/core/text_io.hpp"
#include "scenepaint/core/image.hpp"
#include "scenepaint/scenegraph/geometry.hpp"
#include "scenepaint/scenegraph/mesh.hpp"
#include "scenepaint/scenegraph/scene.hpp"
#include "scenepaint/scenegraph/camera.hpp"
#include "scenepaint/scenegraph/style.hpp"
#include "scenepaint/scenegraph/edit.hpp"
#include "scenepaint/raster/projection.hpp"
#include "scenepaint/raster/frame_maps.hpp"
#include "scenepaint/raster/rasterizer.hpp"
#include "scenepaint/raster/frame_io.hpp"
#include "scenepaint/encoding/positional.hpp"
#include "scenepaint/encoding/nonlinear.hpp"
#include "scenepaint/encoding/input.hpp"
#include "scenepaint/tensornet/tensor.hpp"
#include "scenepaint/tensornet/gemm.hpp"
#include "scenepaint/tensornet/conv.hpp"
#include "scenepaint/tensornet/ops.hpp"
#include "scenepaint/tensornet/softmax_ce.hpp"
#include "scenepaint/tensornet/adam.hpp"
#include "scenepaint/painter/generator.hpp"
#include "scenepaint/painter/checkpoint.hpp"
#include "scenepaint/refgen/references.hpp"
#include "scenepaint/trainer/losses.hpp"
#include "scenepaint/trainer/discriminator.hpp"
#include "scenepaint/trainer/config.hpp"
#include "scenepaint/trainer/train.hpp"
#include "scenepaint/evalkit/metrics.hpp"
#include "scenepaint/meshbake/bake.hpp"
