#pragma once

// Convenience include for the library proper. The CLI command layer
// (commands.hpp) is kept out because it depends on the vendored JSON
// header; include it directly where needed.

#include "switchsurf/boost_converter.hpp"
#include "switchsurf/config.hpp"
#include "switchsurf/export.hpp"
#include "switchsurf/filippov.hpp"
#include "switchsurf/geometry.hpp"
#include "switchsurf/linalg.hpp"
#include "switchsurf/lyapunov.hpp"
#include "switchsurf/model.hpp"
#include "switchsurf/rules.hpp"
#include "switchsurf/sampling.hpp"
#include "switchsurf/tolerances.hpp"
