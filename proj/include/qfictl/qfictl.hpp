// Copyright 2026 The qfictl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "qfictl/control.hpp"
#include "qfictl/error.hpp"
#include "qfictl/estimation.hpp"
#include "qfictl/fisher.hpp"
#include "qfictl/fit.hpp"
#include "qfictl/frames.hpp"
#include "qfictl/models.hpp"
#include "qfictl/operators.hpp"
#include "qfictl/propagation.hpp"
#include "qfictl/version.hpp"
