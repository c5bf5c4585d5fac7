#pragma once

#include <stdexcept>
#include <string>

namespace polisim {

// Agent response could not be turned into a valid decision.
struct ParseFailure : std::runtime_error {
    explicit ParseFailure(const std::string& what) : std::runtime_error(what) {}
};

// Network-level failure talking to the chat-completion service.
struct TransportError : std::runtime_error {
    explicit TransportError(const std::string& what) : std::runtime_error(what) {}
};

// Simulation produced or received a non-finite state.
struct SimulationError : std::runtime_error {
    explicit SimulationError(const std::string& what) : std::runtime_error(what) {}
};

// Design matrix is rank deficient.
struct SingularDesign : std::runtime_error {
    explicit SingularDesign(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace polisim
