#pragma once

#include <chrono>
#include <map>
#include <stdexcept>
#include <string>

namespace credi::http {

struct Url {
    std::string scheme; ///< "http" or "https"
    std::string host;
    int port = 0;
    std::string path; ///< base path without trailing slash, may be empty

    static Url parse(const std::string& url);
    std::string origin() const;
};

struct Response {
    int status = 0;
    std::string body;
};

enum class FailureKind { Timeout, Connection };

/// Transport-level failure (no HTTP status available).
class TransportError : public std::runtime_error {
public:
    TransportError(FailureKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    FailureKind kind() const noexcept { return kind_; }

private:
    FailureKind kind_;
};

/// POSTs a JSON body to base.path + suffix. Throws TransportError.
Response post_json(const Url& base, const std::string& suffix, const std::string& body,
                   const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout);

} // namespace credi::http
