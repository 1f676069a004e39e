"""Client tests against a local HTTP stub mimicking the public API wire format."""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer
from urllib.parse import parse_qs, urlparse

import pytest

from lebnag.lmfdb_client import LmfdbClient, _expand_factorization
from lebnag.newforms import DataUnavailableError

# two fake classes at level 578 with charpoly factorisations at p = 3, 7
STUB_NEWFORMS = [
    {"label": "578.2.b.a", "dim": 2, "hecke_orbit_code": 101},
    {"label": "578.2.b.b", "dim": 2, "hecke_orbit_code": 102},
]
STUB_CHARPOLYS = {
    101: [
        {"p": 3, "charpoly_factorization": [[[2, 0, 1], 1]]},
        {"p": 7, "charpoly_factorization": [[[0, 1], 2]]},
    ],
    102: [
        {"p": 3, "charpoly_factorization": [[[-1, 1], 1], [[1, 1], 1]]},
        {"p": 7, "charpoly_factorization": [[[18, 0, 1], 1]]},
    ],
}


class _Handler(BaseHTTPRequestHandler):
    def do_GET(self):
        url = urlparse(self.path)
        qs = parse_qs(url.query)
        if url.path.rstrip("/").endswith("mf_newforms"):
            data = STUB_NEWFORMS
        elif url.path.rstrip("/").endswith("mf_hecke_charpolys"):
            code = int(qs["hecke_orbit_code"][0].lstrip("i"))
            data = STUB_CHARPOLYS.get(code, [])
        else:
            self.send_response(404)
            self.end_headers()
            return
        body = json.dumps({"data": data}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def log_message(self, *args):
        pass


@pytest.fixture()
def stub_server():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}"
    server.shutdown()


def test_expand_factorization():
    # (x^2 + 2)^1 stays; (x)^2 expands; product of two linears expands
    assert _expand_factorization([[[2, 0, 1], 1]]) == (2, 0, 1)
    assert _expand_factorization([[[0, 1], 2]]) == (0, 0, 1)
    assert _expand_factorization([[[-1, 1], 1], [[1, 1], 1]]) == (-1, 0, 1)


def test_fetch_space_via_stub(stub_server):
    client = LmfdbClient(stub_server, min_interval=0.0)
    space = client.fetch_space(17, primes=(3, 7))
    assert space.level == 578 and space.total_dim == 4
    assert [c.label for c in space.classes] == ["578.2.b.a", "578.2.b.b"]
    a = space.classes[0]
    assert a.ap_data[3].charpoly == (2, 0, 1)
    assert a.ap_data[7].charpoly == (0, 0, 1)
    b = space.classes[1]
    assert b.ap_data[3].charpoly == (-1, 0, 1)


def test_client_unreachable_host_fails_cleanly():
    client = LmfdbClient("http://127.0.0.1:1", min_interval=0.0, retries=2, timeout=0.2)
    with pytest.raises(DataUnavailableError):
        client.fetch_space(17)


def test_fetch_space_populates_cache(stub_server, tmp_path, monkeypatch):
    import os

    from lebnag import newforms
    from lebnag.newforms import fetch_space

    # hide the bundled snapshot so the network path (stub) is exercised
    monkeypatch.setattr(newforms, "bundled_snapshot_path", lambda q: None)
    client = LmfdbClient(stub_server, min_interval=0.0)
    cdir = tmp_path / "cache"
    with pytest.warns(UserWarning):  # stub data does not match the summary
        space = fetch_space(17, cache_dir=str(cdir), client=client)
    assert space.total_dim == 4
    assert os.path.exists(cdir / "space_q17_level578.json")
    # second call: cache hit, no network (offline would fail if the cache missed)
    with pytest.warns(UserWarning):
        again = fetch_space(17, cache_dir=str(cdir), offline=True)
    assert again == space
