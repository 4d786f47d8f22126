#ifndef MIRAGE_ERROR_HPP
#define MIRAGE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mirage {

/// Toolkit-wide exception. `category` is a stable machine-parsable token
/// (e.g. "EmptyMask", "SchemaError"); `what()` is "Category: detail".
class Error : public std::runtime_error {
public:
    Error(std::string category, const std::string& detail)
        : std::runtime_error(category + ": " + detail),
          category_(std::move(category)) {}

    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

[[noreturn]] inline void fail(const std::string& category, const std::string& detail) {
    throw Error(category, detail);
}

} // namespace mirage

#endif
