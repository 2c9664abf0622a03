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

#pragma once

#include "parkit/mask.hpp"

namespace parkit {

// Sets every pixel whose center lies within `radius` of (cx, cy).
void paint_disc(Mask& m, double cx, double cy, double radius);
void paint_thick_line(Mask& m, double x0, double y0, double x1, double y1, double radius);
void paint_ellipse(Mask& m, double cx, double cy, double rx, double ry, double angle);

}  // namespace parkit
