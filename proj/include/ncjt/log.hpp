#pragma once

#include <functional>
#include <string_view>

namespace ncjt {

using WarningHandler = std::function<void(std::string_view)>;

// Emits a warning through the installed handler (stderr by default).
void warn(std::string_view message);

// Installs a handler and returns the previous one. Passing an empty handler
// silences warnings.
WarningHandler set_warning_handler(WarningHandler handler);

}  // namespace ncjt
