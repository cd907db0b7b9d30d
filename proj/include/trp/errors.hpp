#pragma once

#include <stdexcept>
#include <string>

namespace trp {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class MissingFile : public Error {
  public:
    explicit MissingFile(const std::string& path) : Error("missing file: " + path) {}
};

class ParseError : public Error {
  public:
    ParseError(const std::string& what, int row, int col)
        : Error(what + " (row " + std::to_string(row) + ", col " + std::to_string(col) + ")"),
          row_(row),
          col_(col) {}
    explicit ParseError(const std::string& what) : Error(what), row_(-1), col_(-1) {}

    int row() const { return row_; }
    int col() const { return col_; }

  private:
    int row_;
    int col_;
};

class NonFiniteValue : public Error {
  public:
    using Error::Error;
};

class LookbackExceedsHistory : public Error {
  public:
    LookbackExceedsHistory(int k, int t)
        : Error("lookback " + std::to_string(k) + " exceeds history length " + std::to_string(t)) {}
};

class UniverseTooLarge : public Error {
  public:
    explicit UniverseTooLarge(int n)
        : Error("brute-force enumeration limited to 8 nodes, got " + std::to_string(n)) {}
};

class FixedIndexNotActive : public Error {
  public:
    explicit FixedIndexNotActive(int index)
        : Error("fixed root index " + std::to_string(index) + " is not in the active set") {}
};

class NoSectorEtfs : public Error {
  public:
    NoSectorEtfs() : Error("no sector ETFs in the active set") {}
};

class InconsistentLabels : public Error {
  public:
    using Error::Error;
};

class DegenerateTiers : public Error {
  public:
    using Error::Error;
};

}  // namespace trp
