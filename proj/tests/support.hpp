#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "fsmem/errors.hpp"
#include "fsmem/events.hpp"
#include "fsmem/providers.hpp"

namespace testing_support {

inline fsmem::AtomicAction act(std::int64_t ts, fsmem::ActionData data) { return {ts, std::move(data), fsmem::Json::object()}; }

inline fsmem::FileRead read(std::string path, std::int64_t length = 100, std::int64_t views = 1) {
    fsmem::FileRead r;
    r.path = std::move(path);
    r.length = length;
    r.view_count = views;
    return r;
}

inline fsmem::FileWrite create(std::string path, std::optional<std::int64_t> length = std::nullopt) {
    fsmem::FileWrite w;
    w.path = std::move(path);
    w.operation = "create";
    w.length = length;
    return w;
}

inline fsmem::FileEdit edit(std::string path, std::int64_t added, std::int64_t deleted) {
    fsmem::FileEdit e;
    e.path = std::move(path);
    e.lines_added = added;
    e.lines_deleted = deleted;
    return e;
}

// Completion provider driven by a callback; counts calls.
class ScriptedCompletion final : public fsmem::CompletionProvider {
public:
    using Fn = std::function<std::string(const fsmem::CompletionRequest&)>;
    explicit ScriptedCompletion(Fn fn) : fn_(std::move(fn)) {}
    fsmem::CompletionResponse complete(const fsmem::CompletionRequest& req) override {
        ++calls;
        std::lock_guard lock(mu_);
        return {fn_(req), fsmem::FinishStatus::stop};
    }
    std::atomic<int> calls{0};

private:
    Fn fn_;
    std::mutex mu_;
};

class FailingCompletion final : public fsmem::CompletionProvider {
public:
    fsmem::CompletionResponse complete(const fsmem::CompletionRequest&) override {
        throw fsmem::ProviderUnavailable("simulated outage");
    }
};

class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("fsmem_test_" + std::to_string(rd()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

} // namespace testing_support
