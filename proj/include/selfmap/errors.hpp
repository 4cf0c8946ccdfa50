#pragma once

#include <stdexcept>
#include <string>

namespace selfmap {

// File could not be opened, read, or written.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// A stage input artifact is absent; the message names the producing stage.
struct MissingStageError : std::runtime_error {
  explicit MissingStageError(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace selfmap
