import pytest

from autopyramid.errors import MalformedServiceReply, ServiceUnavailable
from autopyramid.services import (
    DEFAULT_ATTEMPTS,
    DEFAULT_RETRY_SCHEDULE,
    ChatClient,
    GraphToTextClient,
    ParseServiceClient,
    PresenceClient,
    post_json,
    retry_schedule,
)

from stubs import (
    constant_presence,
    dead_endpoint,
    echo_generator,
    echo_parser,
    presence_from_hypothesis,
    scripted_chat,
)


def test_retry_contract_constants():
    assert DEFAULT_ATTEMPTS == 3
    assert DEFAULT_RETRY_SCHEDULE == (1.0, 2.0, 4.0)


def test_retry_schedule_env_override(monkeypatch):
    monkeypatch.setenv("AUTOPYRAMID_RETRY_SCHEDULE", "0.5,3")
    assert retry_schedule() == (0.5, 3.0)
    monkeypatch.delenv("AUTOPYRAMID_RETRY_SCHEDULE")
    assert retry_schedule() == DEFAULT_RETRY_SCHEDULE


def test_post_json_roundtrip(stub_service):
    stub = stub_service(lambda path, body: (200, {"echo": body}))
    reply = post_json(stub.url, {"x": 1}, schedule=())
    assert reply == {"echo": {"x": 1}}
    assert stub.requests[0][1] == {"x": 1}


def test_post_json_sends_bearer_token(stub_service):
    stub = stub_service(lambda path, body: (200, {}))
    post_json(stub.url, {}, token="sesame", schedule=())
    assert stub.requests[0][2].get("Authorization") == "Bearer sesame"
    post_json(stub.url, {}, token=None, schedule=())
    assert "Authorization" not in stub.requests[1][2]


def test_post_json_retries_then_succeeds(stub_service):
    stub = stub_service(lambda path, body: (200, {"ok": True}), failures=2)
    delays = []
    reply = post_json(stub.url, {}, schedule=(1.0, 2.0, 4.0), sleep=delays.append)
    assert reply == {"ok": True}
    assert len(stub.requests) == 3
    assert delays == [1.0, 2.0]


def test_post_json_gives_up_after_three_attempts(stub_service):
    stub = stub_service(lambda path, body: (200, {}), failures=99)
    delays = []
    with pytest.raises(ServiceUnavailable):
        post_json(stub.url, {}, schedule=(1.0, 2.0, 4.0), sleep=delays.append)
    assert len(stub.requests) == 3
    assert delays == [1.0, 2.0]


def test_post_json_unreachable_endpoint():
    delays = []
    with pytest.raises(ServiceUnavailable):
        post_json(dead_endpoint(), {}, schedule=(0.0, 0.0), sleep=delays.append)
    assert len(delays) == 2


def test_post_json_4xx_is_not_retried(stub_service):
    stub = stub_service(lambda path, body: (404, {}))
    with pytest.raises(ServiceUnavailable):
        post_json(stub.url, {}, schedule=(0.0, 0.0))
    assert len(stub.requests) == 1


def test_post_json_rejects_non_json(stub_service):
    stub = stub_service(None, raw_body=b"this is not json")
    with pytest.raises(MalformedServiceReply):
        post_json(stub.url, {}, schedule=())
    listy = stub_service(None, raw_body=b"[1, 2, 3]")
    with pytest.raises(MalformedServiceReply):
        post_json(listy.url, {}, schedule=())


def test_generator_client_batches_and_orders(stub_service):
    stub = stub_service(echo_generator)
    client = GraphToTextClient(stub.url, batch_size=2, concurrency=3)
    graphs = [f"(g{i} / thing)" for i in range(5)]
    texts = client.generate(graphs)
    assert texts == [f"T:{g}" for g in graphs]
    sizes = sorted(len(body["graphs"]) for _, body, _ in stub.requests)
    assert sizes == [1, 2, 2]


def test_generator_client_empty_no_requests(stub_service):
    stub = stub_service(echo_generator)
    assert GraphToTextClient(stub.url).generate([]) == []
    assert stub.requests == []


def test_generator_client_rejects_bad_reply(stub_service):
    stub = stub_service(lambda path, body: (200, {"texts": "not a list"}))
    with pytest.raises(MalformedServiceReply):
        GraphToTextClient(stub.url).generate(["(a / a1)"])
    short = stub_service(lambda path, body: (200, {"texts": []}))
    with pytest.raises(MalformedServiceReply):
        GraphToTextClient(short.url).generate(["(a / a1)"])


def test_parse_client_roundtrip(stub_service):
    stub = stub_service(echo_parser)
    client = ParseServiceClient(stub.url)
    graphs = client.parse_sentences(["one sentence", "two sentence"])
    assert graphs == ["(a / thing)", "(b / thing)"]
    assert stub.requests[0][1] == {"sentences": ["one sentence", "two sentence"]}


def test_presence_client_orders_across_batches(stub_service):
    stub = stub_service(presence_from_hypothesis)
    client = PresenceClient(stub.url, batch_size=3, concurrency=4)
    pairs = [("summary", f"0.{i:02d}") for i in range(1, 11)]
    probs = client.probabilities(pairs)
    assert probs == [float(f"0.{i:02d}") for i in range(1, 11)]
    assert len(stub.requests) == 4  # 3+3+3+1


def test_presence_client_wire_format(stub_service):
    stub = stub_service(constant_presence(0.7))
    client = PresenceClient(stub.url)
    assert client.probabilities([("p1", "h1"), ("p2", "h2")]) == [0.7, 0.7]
    assert stub.requests[0][1] == {
        "pairs": [
            {"premise": "p1", "hypothesis": "h1"},
            {"premise": "p2", "hypothesis": "h2"},
        ]
    }


def test_presence_client_range_validation(stub_service):
    stub = stub_service(constant_presence(1.3))
    with pytest.raises(MalformedServiceReply):
        PresenceClient(stub.url).probabilities([("p", "h")])
    bad_type = stub_service(lambda path, body: (200, {"probs": ["high"]}))
    with pytest.raises(MalformedServiceReply):
        PresenceClient(bad_type.url).probabilities([("p", "h")])


def test_presence_client_token_from_environment(stub_service, monkeypatch):
    monkeypatch.setenv("AUTOPYRAMID_NLI_TOKEN", "hushhush")
    stub = stub_service(constant_presence(0.5))
    PresenceClient(stub.url).probabilities([("p", "h")])
    assert stub.requests[0][2].get("Authorization") == "Bearer hushhush"


def test_chat_client_payload_and_reply(stub_service):
    stub = stub_service(scripted_chat("A # B"))
    client = ChatClient(stub.url, "unit-splitter-1", temperature=0.0)
    content = client.complete([{"role": "user", "content": "hi"}])
    assert content == "A # B"
    body = stub.requests[0][1]
    assert body["model"] == "unit-splitter-1"
    assert body["temperature"] == 0.0
    assert body["messages"] == [{"role": "user", "content": "hi"}]


def test_chat_client_rejects_malformed_reply(stub_service):
    stub = stub_service(lambda path, body: (200, {"choices": []}))
    with pytest.raises(MalformedServiceReply):
        ChatClient(stub.url, "m").complete([])
    wrong = stub_service(lambda path, body: (200, {"choices": [{"message": {"content": 5}}]}))
    with pytest.raises(MalformedServiceReply):
        ChatClient(wrong.url, "m").complete([])


def test_batch_client_validates_parameters(stub_service):
    stub = stub_service(echo_generator)
    with pytest.raises(ValueError):
        GraphToTextClient(stub.url, batch_size=0)
    with pytest.raises(ValueError):
        GraphToTextClient(stub.url, concurrency=0)
