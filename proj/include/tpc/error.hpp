// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tpc
{

enum class ErrorKind
{
    // scene_model
    MalformedBundle,
    DuplicateObjectId,
    NonPositiveExtent,
    EmbeddingDimMismatch,
    InvalidSituation,
    // spatial_engine / scene_api
    InvalidConfig,
    EmptyCandidates,
    ZeroDirection,
    UnknownRelation,
    UnknownAttributeType,
    MissingCandidates,
    MissingEmbedding,
    UnknownLabel,
    Unresolvable,
    DimensionMismatch,
    EmptyReferences,
    BadK,
    UnknownObjectId,
    // tpc_agent
    MissingAsset,
    BackendUnavailable,
    AuthError,
    ScriptExhausted,
    // evaluation
    UnknownQid,
    EmptyTopK,
    EmptyResponse,
    // plumbing
    Io,
};

constexpr std::string_view kind_name(ErrorKind kind) noexcept
{
    switch (kind)
    {
        case ErrorKind::MalformedBundle: return "MalformedBundle";
        case ErrorKind::DuplicateObjectId: return "DuplicateObjectId";
        case ErrorKind::NonPositiveExtent: return "NonPositiveExtent";
        case ErrorKind::EmbeddingDimMismatch: return "EmbeddingDimMismatch";
        case ErrorKind::InvalidSituation: return "InvalidSituation";
        case ErrorKind::InvalidConfig: return "InvalidConfig";
        case ErrorKind::EmptyCandidates: return "EmptyCandidates";
        case ErrorKind::ZeroDirection: return "ZeroDirection";
        case ErrorKind::UnknownRelation: return "UnknownRelation";
        case ErrorKind::UnknownAttributeType: return "UnknownAttributeType";
        case ErrorKind::MissingCandidates: return "MissingCandidates";
        case ErrorKind::MissingEmbedding: return "MissingEmbedding";
        case ErrorKind::UnknownLabel: return "UnknownLabel";
        case ErrorKind::Unresolvable: return "Unresolvable";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::EmptyReferences: return "EmptyReferences";
        case ErrorKind::BadK: return "BadK";
        case ErrorKind::UnknownObjectId: return "UnknownObjectId";
        case ErrorKind::MissingAsset: return "MissingAsset";
        case ErrorKind::BackendUnavailable: return "BackendUnavailable";
        case ErrorKind::AuthError: return "AuthError";
        case ErrorKind::ScriptExhausted: return "ScriptExhausted";
        case ErrorKind::UnknownQid: return "UnknownQid";
        case ErrorKind::EmptyTopK: return "EmptyTopK";
        case ErrorKind::EmptyResponse: return "EmptyResponse";
        case ErrorKind::Io: return "Io";
    }
    return "Unknown";
}

/// Domain error carrying a machine-checkable kind. The message is user-facing
/// and, for scene_api errors, is shown verbatim to the LLM during rectification.
class Error: public std::runtime_error
{
  public:
    Error(ErrorKind kind, const std::string& message): std::runtime_error(message), _kind(kind) {}

    [[nodiscard]] ErrorKind kind() const noexcept { return _kind; }

  private:
    ErrorKind _kind;
};

/// Transport-level failure of an LLM backend; the only error that escapes a session.
class BackendError: public Error
{
  public:
    using Error::Error;
};

} // namespace tpc
