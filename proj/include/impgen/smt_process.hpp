#ifndef IMPGEN_SMT_PROCESS_HPP
#define IMPGEN_SMT_PROCESS_HPP

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "impgen/error.hpp"
#include "impgen/oracle.hpp"
#include "impgen/problem.hpp"
#include "impgen/sexpr.hpp"

extern char** environ;

namespace impgen {

/// How to run an external solver speaking the SMT-LIB command language.
struct SolverConfig {
    std::vector<std::string> argv;
    /// Per-query soft limit. On expiry the solver is restarted, its state
    /// replayed, and the query answers unknown.
    std::chrono::milliseconds query_timeout{5000};
    /// Replaces the problem's own set-logic tag when set.
    std::optional<std::string> logic;
    bool record_transcript = false;

    /// Splits `command` on whitespace. A bare solver name known to need flags
    /// for interactive incremental mode gets them appended.
    static SolverConfig from_command(const std::string& command) {
        SolverConfig c;
        std::istringstream in(command);
        for (std::string tok; in >> tok;) c.argv.push_back(tok);
        if (c.argv.empty()) throw Error("empty solver command");
        if (c.argv.size() == 1) {
            auto name = std::filesystem::path(c.argv[0]).filename().string();
            if (name == "z3") {
                c.argv.insert(c.argv.end(), {"-in", "-smt2"});
            } else if (name == "cvc5" || name == "cvc4") {
                c.argv.insert(c.argv.end(), {"--lang=smt2", "--incremental"});
            } else if (name == "yices-smt2") {
                c.argv.push_back("--incremental");
            }
        }
        return c;
    }
};

/// A child process whose stdin and stdout are one end of a socket pair.
class SolverProcess {
public:
    explicit SolverProcess(const std::vector<std::string>& argv) {
        int fds[2];
        if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0)
            throw BackendError(std::string("socketpair: ") + std::strerror(errno));
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_adddup2(&actions, fds[1], STDIN_FILENO);
        posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
        posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
        std::vector<char*> args;
        for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
        args.push_back(nullptr);
        int rc = ::posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
        posix_spawn_file_actions_destroy(&actions);
        ::close(fds[1]);
        if (rc != 0) {
            ::close(fds[0]);
            throw BackendError("cannot spawn solver '" + argv[0] + "': " + std::strerror(rc));
        }
        fd_ = fds[0];
    }

    SolverProcess(const SolverProcess&) = delete;
    SolverProcess& operator=(const SolverProcess&) = delete;

    ~SolverProcess() {
        if (fd_ >= 0) ::close(fd_);
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
    }

    void write(const std::string& text) {
        std::size_t done = 0;
        while (done < text.size()) {
            ssize_t n = ::send(fd_, text.data() + done, text.size() - done, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BackendError(std::string("write to solver failed: ") + std::strerror(errno));
            }
            done += static_cast<std::size_t>(n);
        }
    }

    /// Next complete response, or nullopt if `deadline` passes first.
    std::optional<SExpr> read_response(std::chrono::steady_clock::time_point deadline) {
        for (;;) {
            if (auto text = take_expression()) return parse_sexpr(*text);
            auto now = std::chrono::steady_clock::now();
            if (now >= deadline) return std::nullopt;
            auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            pollfd p{fd_, POLLIN, 0};
            int rc = ::poll(&p, 1, static_cast<int>(std::max<long long>(1, ms)));
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw BackendError(std::string("poll: ") + std::strerror(errno));
            }
            if (rc == 0) continue;
            char chunk[4096];
            ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw BackendError(std::string("read from solver failed: ") + std::strerror(errno));
            }
            if (n == 0) throw BackendError("solver process terminated unexpectedly");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

private:
    // Extracts one whitespace-terminated atom or one balanced list.
    std::optional<std::string> take_expression() {
        std::size_t i = 0;
        while (i < buffer_.size() && std::isspace(static_cast<unsigned char>(buffer_[i]))) ++i;
        if (i == buffer_.size()) {
            buffer_.clear();
            return std::nullopt;
        }
        std::size_t start = i;
        if (buffer_[i] != '(') {
            while (i < buffer_.size() && !std::isspace(static_cast<unsigned char>(buffer_[i]))) ++i;
            if (i == buffer_.size()) return std::nullopt;
        } else {
            int depth = 0;
            for (; i < buffer_.size(); ++i) {
                char c = buffer_[i];
                if (c == '"' || c == '|') {
                    auto close = buffer_.find(c, i + 1);
                    if (close == std::string::npos) return std::nullopt;
                    i = close;
                } else if (c == '(') {
                    ++depth;
                } else if (c == ')' && --depth == 0) {
                    ++i;
                    break;
                }
            }
            if (depth != 0) return std::nullopt;
        }
        std::string out = buffer_.substr(start, i - start);
        buffer_.erase(0, i);
        return out;
    }

    pid_t pid_ = -1;
    int fd_ = -1;
    std::string buffer_;
};

/// Session backed by an external solver process. Command sequence:
/// `(set-option :produce-models true)`, `(set-logic L)`, the declarations,
/// `(assert S)`...; per frame `(push 1)` and `(assert lit)`...; queries
/// `(check-sat)` and `(get-value (atoms))`; `(pop 1)` to retract.
class SmtSession final : public Session {
public:
    SmtSession(const Problem& problem, const LiteralTable& table, bool with_assertions,
               SolverConfig config)
        : table_(&table), config_(std::move(config)) {
        preamble_ = "(set-option :produce-models true)\n";
        std::string logic = config_.logic.value_or(problem.signature.logic);
        preamble_ += "(set-logic " + (logic.empty() ? std::string("ALL") : logic) + ")\n";
        for (const auto& d : problem.declarations) preamble_ += d.str() + "\n";
        if (with_assertions)
            for (const auto& a : problem.assertions) preamble_ += "(assert " + a.str() + ")\n";
        start();
    }

    void assert_clauses_scoped(std::span<const Clause> clauses) override {
        std::string cmd = "(push 1)\n";
        for (const auto& c : clauses) cmd += "(assert " + clause_term(c) + ")\n";
        frames_.push_back(cmd);
        send(cmd);
    }

    void retract_scope() override {
        if (frames_.empty()) throw Error("retract_scope without matching assert_scoped");
        frames_.pop_back();
        send("(pop 1)\n");
    }

    SatResult check_sat(std::span<const Lit> model_query = {}) override {
        ++checks_;
        send("(check-sat)\n");
        auto reply = await();
        SatResult r;
        if (!reply) {
            restart();
            return r;
        }
        if (reply->is_atom() && reply->text() == "sat") {
            r.status = SatStatus::sat;
        } else if (reply->is_atom() && reply->text() == "unsat") {
            r.status = SatStatus::unsat;
            return r;
        } else if (reply->is_atom() && reply->text() == "unknown") {
            return r;
        } else {
            throw BackendError("unexpected solver reply to check-sat: " + reply->str());
        }
        if (model_query.empty()) return r;
        std::string cmd = "(get-value (";
        for (std::size_t i = 0; i < model_query.size(); ++i) {
            if (i) cmd += ' ';
            cmd += table_->atom_text(model_query[i].atom());
        }
        cmd += "))\n";
        send(cmd);
        auto values = await();
        if (!values) {
            restart();
            return r; // sat, without a model
        }
        if (!values->is_list() || values->size() != model_query.size() || values->is_app("error"))
            throw BackendError("unexpected solver reply to get-value: " + values->str());
        std::vector<Lit> lits;
        for (std::size_t i = 0; i < model_query.size(); ++i) {
            const SExpr& pair = (*values)[i];
            if (!pair.is_list() || pair.size() != 2 || !pair[1].is_atom()) continue;
            const auto& v = pair[1].text();
            if (v == "true") lits.push_back(Lit::make(model_query[i].atom(), false));
            else if (v == "false") lits.push_back(Lit::make(model_query[i].atom(), true));
        }
        r.model_literals = std::move(lits);
        return r;
    }

    bool supports_models() const noexcept override { return true; }
    std::size_t depth() const noexcept override { return frames_.size(); }

    /// Every command sent so far, when transcripts are enabled.
    const std::string& transcript() const noexcept { return transcript_; }
    std::size_t restarts() const noexcept { return restarts_; }

private:
    std::string clause_term(const Clause& c) const {
        if (c.empty()) return "false";
        if (c.size() == 1) return table_->format(*c.begin());
        std::string out = "(or";
        for (Lit l : c) out += " " + table_->format(l);
        return out + ")";
    }

    void start() {
        process_ = std::make_unique<SolverProcess>(config_.argv);
        send(preamble_);
    }

    void send(const std::string& text) {
        if (config_.record_transcript) transcript_ += text;
        process_->write(text);
    }

    std::optional<SExpr> await() {
        auto reply = process_->read_response(std::chrono::steady_clock::now() + config_.query_timeout);
        if (reply && reply->is_app("error"))
            throw BackendError("solver error: " + (reply->size() > 1 ? (*reply)[1].str() : reply->str()));
        return reply;
    }

    // Replays the preamble and open frames into a fresh process.
    void restart() {
        ++restarts_;
        process_.reset();
        process_ = std::make_unique<SolverProcess>(config_.argv);
        process_->write(preamble_);
        for (const auto& f : frames_) process_->write(f);
    }

    const LiteralTable* table_;
    SolverConfig config_;
    std::string preamble_;
    std::vector<std::string> frames_;
    std::unique_ptr<SolverProcess> process_;
    std::string transcript_;
    std::size_t restarts_ = 0;
};

class SmtBackend final : public Backend {
public:
    explicit SmtBackend(SolverConfig config) : config_(std::move(config)) {}

    std::unique_ptr<Session> open(const Problem& problem, const LiteralTable& table,
                                  bool with_assertions = true) override {
        return std::make_unique<SmtSession>(problem, table, with_assertions, config_);
    }

    const SolverConfig& config() const noexcept { return config_; }

private:
    SolverConfig config_;
};

} // namespace impgen

#endif // IMPGEN_SMT_PROCESS_HPP
