#pragma once

#include <functional>
#include <iostream>
#include <mutex>
#include <string>
#include <string_view>

namespace promptpore {

using WarningSink = std::function<void(std::string_view)>;

namespace detail {
inline WarningSink& warning_sink()
{
    static WarningSink sink = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return sink;
}
inline std::mutex& warning_mutex()
{
    static std::mutex m;
    return m;
}
}  // namespace detail

/// Replace the process-wide warning handler. Returns the previous one.
inline WarningSink set_warning_sink(WarningSink sink)
{
    std::lock_guard lock(detail::warning_mutex());
    auto old = std::move(detail::warning_sink());
    detail::warning_sink() = std::move(sink);
    return old;
}

inline void warn(std::string_view msg)
{
    std::lock_guard lock(detail::warning_mutex());
    if (detail::warning_sink()) detail::warning_sink()(msg);
}

}  // namespace promptpore
