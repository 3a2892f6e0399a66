// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <sys/wait.h>
#include <unistd.h>

#include <csignal>
#include <cstdio>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "corpusforge/cleaning.hpp"
#include "corpusforge/log.hpp"

namespace corpusforge {

/// How whitespace normalization runs: the built-in rule normalizer, or an
/// external command speaking the length-prefixed record protocol (a stand-in
/// for model-based spacing restorers this toolkit deliberately does not ship).
struct NormalizerConfig {
    enum class Mode { BuiltIn, External };
    Mode mode = Mode::BuiltIn;
    std::vector<std::string> external_command;
};

namespace detail {

/// Record framing: "<decimal byte length>\n<payload bytes>\n". The length
/// prefix permits embedded newlines in documents.
inline void write_record(std::string& out, std::string_view payload) {
    out += std::to_string(payload.size());
    out += '\n';
    out.append(payload);
    out += '\n';
}

inline bool read_record(const std::string& buf, std::size_t& pos, std::string& payload) {
    const auto nl = buf.find('\n', pos);
    if (nl == std::string::npos) return false;
    std::size_t len = 0;
    for (std::size_t i = pos; i < nl; ++i) {
        if (buf[i] < '0' || buf[i] > '9') return false;
        len = len * 10 + static_cast<std::size_t>(buf[i] - '0');
    }
    if (nl + 1 + len + 1 > buf.size()) return false;
    if (buf[nl + 1 + len] != '\n') return false;
    payload.assign(buf, nl + 1, len);
    pos = nl + 1 + len + 1;
    return true;
}

/// Runs `command`, feeding `input` on stdin (from a writer thread, so large
/// batches cannot deadlock on pipe buffers) and returning captured stdout.
/// nullopt on spawn failure or nonzero exit.
inline std::optional<std::string> run_subprocess(const std::vector<std::string>& command,
                                                 const std::string& input) {
    if (command.empty()) return std::nullopt;

    // A child that exits before reading its stdin must surface as a failed
    // write, not a fatal SIGPIPE.
    [[maybe_unused]] static const auto sigpipe_ignored = std::signal(SIGPIPE, SIG_IGN);

    int in_pipe[2], out_pipe[2];
    if (pipe(in_pipe) != 0) return std::nullopt;
    if (pipe(out_pipe) != 0) {
        close(in_pipe[0]), close(in_pipe[1]);
        return std::nullopt;
    }

    const pid_t pid = fork();
    if (pid < 0) {
        close(in_pipe[0]), close(in_pipe[1]), close(out_pipe[0]), close(out_pipe[1]);
        return std::nullopt;
    }
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        close(in_pipe[0]), close(in_pipe[1]), close(out_pipe[0]), close(out_pipe[1]);
        std::vector<char*> argv;
        argv.reserve(command.size() + 1);
        for (const auto& arg : command) argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }

    close(in_pipe[0]);
    close(out_pipe[1]);

    std::thread writer([&input, fd = in_pipe[1]] {
        std::size_t off = 0;
        while (off < input.size()) {
            const ssize_t n = write(fd, input.data() + off, input.size() - off);
            if (n <= 0) break;
            off += static_cast<std::size_t>(n);
        }
        close(fd);
    });

    std::string output;
    char buf[4096];
    for (;;) {
        const ssize_t n = read(out_pipe[0], buf, sizeof(buf));
        if (n <= 0) break;
        output.append(buf, static_cast<std::size_t>(n));
    }
    close(out_pipe[0]);
    writer.join();

    int status = 0;
    waitpid(pid, &status, 0);
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) return std::nullopt;
    return output;
}

}  // namespace detail

/// Normalizes a batch of documents through the external command. Any failure
/// (spawn, exit status, malformed reply) passes the affected documents through
/// unchanged with a logged warning; normalization never drops data.
inline std::vector<std::string> normalize_external(const std::vector<std::string>& texts,
                                                   const std::vector<std::string>& command) {
    std::string input;
    for (const auto& t : texts) detail::write_record(input, t);

    const auto output = detail::run_subprocess(command, input);
    if (!output) {
        log_warn("external normalizer failed to run; passing texts through un-normalized");
        return texts;
    }

    std::vector<std::string> results;
    results.reserve(texts.size());
    std::size_t pos = 0;
    std::string payload;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (detail::read_record(*output, pos, payload)) {
            results.push_back(payload);
        } else {
            log_warn("external normalizer reply truncated at record " + std::to_string(i) +
                     "; remaining texts pass through un-normalized");
            for (std::size_t j = i; j < texts.size(); ++j) results.push_back(texts[j]);
            break;
        }
    }
    return results;
}

/// Single-document normalization under the configured mode.
inline std::string normalize_whitespace(std::string_view text,
                                        const NormalizerConfig& cfg = {}) {
    if (cfg.mode == NormalizerConfig::Mode::BuiltIn) return normalize_whitespace_builtin(text);
    auto out = normalize_external({std::string(text)}, cfg.external_command);
    return out.front();
}

inline NormalizerConfig normalizer_config_from_json(const nlohmann::json& j) {
    NormalizerConfig cfg;
    const auto mode = j.value("mode", std::string{"builtin"});
    if (mode == "builtin") {
        cfg.mode = NormalizerConfig::Mode::BuiltIn;
    } else if (mode == "external") {
        cfg.mode = NormalizerConfig::Mode::External;
        cfg.external_command = j.at("command").get<std::vector<std::string>>();
        if (cfg.external_command.empty())
            throw ConfigError("normalizer: external mode needs a non-empty command");
    } else {
        throw ConfigError("normalizer: unknown mode '" + mode + "'");
    }
    return cfg;
}

}  // namespace corpusforge
