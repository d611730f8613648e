// fusionvision - RGB-D object isolation and 3D box extraction
// SPDX-License-Identifier: Apache-2.0

#ifndef FV_FV_HPP
#define FV_FV_HPP

#include "fv/align.hpp"
#include "fv/cloud.hpp"
#include "fv/cloudproc.hpp"
#include "fv/core.hpp"
#include "fv/io/bundle.hpp"
#include "fv/io/documents.hpp"
#include "fv/io/ply.hpp"
#include "fv/io/png.hpp"
#include "fv/knn.hpp"
#include "fv/losses.hpp"
#include "fv/metrics.hpp"
#include "fv/pipeline.hpp"
#include "fv/synth.hpp"
#include "fv/synth_bundle.hpp"

#endif  // FV_FV_HPP
