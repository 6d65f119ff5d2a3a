#include "credi/http.hpp"

#include "credi/error.hpp"

#include <httplib.h>

namespace credi::http {

Url Url::parse(const std::string& url) {
    Url u;
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: " + url);
    u.scheme = url.substr(0, scheme_end);
    if (u.scheme != "http" && u.scheme != "https") throw ConfigError("unsupported URL scheme: " + u.scheme);
    std::string rest = url.substr(scheme_end + 3);
    const auto slash = rest.find('/');
    std::string authority = rest.substr(0, slash);
    u.path = slash == std::string::npos ? "" : rest.substr(slash);
    while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
    const auto colon = authority.rfind(':');
    if (colon != std::string::npos && authority.find(']') == std::string::npos) {
        u.host = authority.substr(0, colon);
        try {
            u.port = std::stoi(authority.substr(colon + 1));
        } catch (const std::exception&) {
            throw ConfigError("invalid port in URL: " + url);
        }
    } else {
        u.host = authority;
        u.port = u.scheme == "https" ? 443 : 80;
    }
    if (u.host.empty()) throw ConfigError("endpoint URL has no host: " + url);
    return u;
}

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

Response post_json(const Url& base, const std::string& suffix, const std::string& body,
                   const std::map<std::string, std::string>& headers, std::chrono::milliseconds timeout) {
    httplib::Client client(base.origin());
    const auto secs = timeout.count() / 1000;
    const auto usecs = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);
    auto result = client.Post(base.path + suffix, hdrs, body, "application/json");
    if (!result) {
        const auto err = result.error();
        const auto kind = (err == httplib::Error::Read || err == httplib::Error::Write ||
                           err == httplib::Error::ConnectionTimeout)
                              ? FailureKind::Timeout
                              : FailureKind::Connection;
        throw TransportError(kind, "HTTP request to " + base.origin() + base.path + suffix + " failed: " +
                                       httplib::to_string(err));
    }
    return Response{result->status, result->body};
}

} // namespace credi::http
