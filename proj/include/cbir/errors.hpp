#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cbir {

/// Closed error taxonomy shared by the engine, the CLI and the HTTP service.
enum class ErrorCode { NotFound, Validation, Decode, InsufficientData, Storage, Internal };

std::string_view error_code_name(ErrorCode code);

class CbirError : public std::runtime_error {
  public:
    CbirError(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

class NotFoundError : public CbirError {
  public:
    explicit NotFoundError(const std::string& m) : CbirError(ErrorCode::NotFound, m) {}
};

class ValidationError : public CbirError {
  public:
    explicit ValidationError(const std::string& m) : CbirError(ErrorCode::Validation, m) {}
};

class DecodeError : public CbirError {
  public:
    explicit DecodeError(const std::string& m) : CbirError(ErrorCode::Decode, m) {}
};

class InsufficientDataError : public CbirError {
  public:
    explicit InsufficientDataError(const std::string& m) : CbirError(ErrorCode::InsufficientData, m) {}
};

class StorageError : public CbirError {
  public:
    explicit StorageError(const std::string& m) : CbirError(ErrorCode::Storage, m) {}
};

// Raised instead of reinitializing a store whose files fail to parse.
class CorruptStoreError : public StorageError {
  public:
    explicit CorruptStoreError(const std::string& m) : StorageError(m) {}
};

// A second writable handle was requested for a store path that is already owned.
class StoreLockedError : public StorageError {
  public:
    explicit StoreLockedError(const std::string& m) : StorageError(m) {}
};

} // namespace cbir
