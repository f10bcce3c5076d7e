// Copyright 2025 The T2L Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef T2L_ERROR_HPP_
#define T2L_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace t2l {

// Base for every error raised by the library. Callers that only care about
// "this case failed" can catch this one type.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class UnknownCrashType : public Error {
public:
    explicit UnknownCrashType(const std::string& crash_type)
        : Error("unknown crash type: \"" + crash_type + "\"")
        , crash_type_(crash_type)
    {
    }
    const std::string& crash_type() const { return crash_type_; }

private:
    std::string crash_type_;
};

class IoError : public Error {
public:
    using Error::Error;
};

class BackendUnavailable : public Error {
public:
    using Error::Error;
};

class BuildMissing : public Error {
public:
    using Error::Error;
};

class DebuggerMissing : public Error {
public:
    using Error::Error;
};

class NoCrashDetected : public Error {
public:
    using Error::Error;
};

class EmptyEvidence : public Error {
public:
    using Error::Error;
};

class ContractViolation : public Error {
public:
    using Error::Error;
};

class ProviderError : public Error {
public:
    using Error::Error;
};

class AuthError : public ProviderError {
public:
    using ProviderError::ProviderError;
};

class ExtractionFailed : public Error {
public:
    using Error::Error;
};

class AllSamplesFailed : public Error {
public:
    using Error::Error;
};

class UnknownModelPrice : public Error {
public:
    using Error::Error;
};

class NoGroundTruth : public Error {
public:
    using Error::Error;
};

} // namespace t2l

#endif // T2L_ERROR_HPP_
