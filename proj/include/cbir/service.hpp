#pragma once

#include "cbir/config.hpp"
#include "cbir/executor.hpp"
#include "cbir/simulation.hpp"

#include <memory>
#include <string>

namespace cbir {

/// HTTP/JSON front end for image retrieval and simulation. Routes are listed in docs/api.md.
class CbirService {
  public:
    CbirService(Executor& executor, EngineConfig defaults);
    ~CbirService();

    CbirService(const CbirService&) = delete;
    CbirService& operator=(const CbirService&) = delete;

    /// Binds the listening socket; port 0 picks a free port. Returns the bound
    /// port. Throws StorageError when the address cannot be bound.
    int bind(const std::string& host, int port);

    /// Serves until stop(); in-flight requests complete before it returns.
    void run();
    void stop();
    void wait_until_ready() const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// HTTP status for an engine error code.
int http_status(ErrorCode code);

} // namespace cbir
