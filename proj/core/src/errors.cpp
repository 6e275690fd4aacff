#include "metaopt/errors.hpp"

namespace metaopt {

std::string describe(const std::exception& e) {
  std::string text = e.what();
  // IterationError already embeds the message of the error it wraps.
  if (dynamic_cast<const IterationError*>(&e) != nullptr) return text;
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    text += ": " + describe(inner);
  } catch (...) {
    text += ": unknown error";
  }
  return text;
}

}  // namespace metaopt
