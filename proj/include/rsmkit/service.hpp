#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "rsmkit/campaign.hpp"
#include "rsmkit/error.hpp"

namespace rsmkit {

// Campaign documents on disk, one `<id>.json` per campaign in a directory,
// or a single project file. Writes to one campaign are serialized; readers
// always see the last persisted snapshot.
class CampaignStore {
public:
    // `root` is a directory or an existing/new `.json` project file.
    explicit CampaignStore(std::filesystem::path root);

    struct Summary {
        std::string id;
        std::string name;
        std::size_t phases = 0;
        std::string modified;
    };

    std::vector<Summary> list() const;
    Campaign get(const std::string& id) const;
    void create(const Campaign& campaign);

    // Runs `mutate` on a copy under the campaign's lock, persists it, then
    // publishes it. A throwing mutation leaves nothing changed.
    Campaign update(const std::string& id, const std::function<void(Campaign&)>& mutate);

private:
    struct Entry {
        std::filesystem::path path;
        std::mutex write_lock;
        Campaign snapshot;
    };

    std::shared_ptr<Entry> entry(const std::string& id) const;

    std::filesystem::path root_;
    bool single_file_ = false;
    mutable std::mutex map_lock_;
    std::map<std::string, std::shared_ptr<Entry>> entries_;
};

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8765;
    std::optional<std::string> allowed_origin;  // CORS, the workbench origin only
    std::optional<std::filesystem::path> static_dir;
};

int http_status(ErrorCode code) noexcept;

class Service {
public:
    Service(CampaignStore& store, ServiceOptions options = {});

    // Transport-independent request handling.
    HttpResponse handle(const std::string& method, const std::string& path,
                        const std::map<std::string, std::string>& query, const std::string& body);

    // Blocks serving HTTP until stop() is called or binding fails. Returns
    // false when the socket could not be bound.
    bool listen();
    // Binds to the configured host on an OS-chosen port; returns it, or -1.
    int bind_any_port();
    bool listen_after_bind();
    void stop();
    bool running() const;

private:
    struct Impl;
    CampaignStore& store_;
    ServiceOptions options_;
    std::shared_ptr<Impl> impl_;
};

}  // namespace rsmkit
