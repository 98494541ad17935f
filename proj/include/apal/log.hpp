#pragma once

#include <functional>
#include <string_view>

namespace apal {

using WarningSink = std::function<void(std::string_view)>;

/// Routes library warnings; the default sink writes to stderr.
void set_warning_sink(WarningSink sink);
void log_warning(std::string_view message);

} // namespace apal
