/* Copyright 2026 The parkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "parkit/detector.hpp"

#include "parkit/error.hpp"

namespace parkit {

Mask ArtifactDetector::predict_raw(const Image& image, const Mask* hole) const {
  if (hole) require_same_shape(image, *hole, "predict");
  Mask raw = detect(image, hole);
  require(image.same_shape(raw), ErrorCode::kShapeMismatch,
          "detector returned a mask of the wrong size");
  return raw;
}

Mask ArtifactDetector::predict(const Image& image, const Mask* hole) const {
  Mask raw = predict_raw(image, hole);
  return hole ? intersect(raw, *hole) : raw;
}

Mask ColorKeyDetector::detect(const Image& image, const Mask*) const {
  Mask out(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y)
    for (int x = 0; x < image.width(); ++x)
      if (image.pixel(x, y) == key_) out.set(x, y);
  return out;
}

Mask FixedMaskDetector::detect(const Image& image, const Mask*) const {
  if (image.same_shape(mask_)) return mask_;
  return resize_nearest(mask_, image.width(), image.height());
}

}  // namespace parkit
