// Copyright 2026 The qgadget Authors
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

#include <atomic>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qgadget {

enum class Errc {
    ZeroNorm,
    ShapeMismatch,
    ModeOutOfRange,
    TruncationRisk,
    CutoffTooSmall,
    LengthMismatch,
    NonFiniteLoss,
    EtaZero,
    DegenerateP,
    Unbounded,
    MultiModeInput,
    GridMismatch,
    GridTooCoarse,
    InvalidArgument,
    ConfigError,
};

inline const char* errc_name(Errc code) {
    switch (code) {
        case Errc::ZeroNorm: return "ZeroNorm";
        case Errc::ShapeMismatch: return "ShapeMismatch";
        case Errc::ModeOutOfRange: return "ModeOutOfRange";
        case Errc::TruncationRisk: return "TruncationRisk";
        case Errc::CutoffTooSmall: return "CutoffTooSmall";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::NonFiniteLoss: return "NonFiniteLoss";
        case Errc::EtaZero: return "EtaZero";
        case Errc::DegenerateP: return "DegenerateP";
        case Errc::Unbounded: return "Unbounded";
        case Errc::MultiModeInput: return "MultiModeInput";
        case Errc::GridMismatch: return "GridMismatch";
        case Errc::GridTooCoarse: return "GridTooCoarse";
        case Errc::InvalidArgument: return "InvalidArgument";
        case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Non-fatal diagnostics (currently only TruncationRisk). The handler is
// process-wide and expected to be installed once at startup.
using WarningHandler = void (*)(Errc, std::string_view);

namespace detail {
inline std::atomic<WarningHandler>& warning_handler_slot() {
    static std::atomic<WarningHandler> slot{nullptr};
    return slot;
}
}  // namespace detail

inline WarningHandler set_warning_handler(WarningHandler handler) {
    return detail::warning_handler_slot().exchange(handler);
}

inline void warn(Errc code, std::string_view message) {
    if (auto handler = detail::warning_handler_slot().load()) {
        handler(code, message);
    }
}

}  // namespace qgadget
