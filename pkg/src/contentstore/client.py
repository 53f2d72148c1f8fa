"""Thin HTTP client for the gateway API, shared by the CLI and benchmarks."""

from urllib.parse import quote

import requests

from .errors import Unauthorized
from .gateway import encode_sidecar_header


class GatewayClient:
    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.token: str | None = None
        self._session = requests.Session()

    def _headers(self, extra: dict | None = None) -> dict:
        headers = {}
        if self.token:
            headers["X-Auth-Token"] = self.token
        headers.update(extra or {})
        return headers

    def auth(self, user: str, key: str) -> dict:
        resp = self._session.post(
            f"{self.base_url}/auth", json={"user": user, "key": key},
            timeout=self.timeout,
        )
        if resp.status_code != 200:
            raise Unauthorized(f"auth failed: HTTP {resp.status_code}")
        payload = resp.json()
        self.token = payload["token"]
        return payload

    def upload(
        self,
        account: str,
        container: str,
        name: str,
        data: bytes,
        filename: str | None = None,
        sidecar: bytes | None = None,
    ) -> tuple[int, dict]:
        headers = {}
        if filename:
            headers["X-Filename"] = filename
        if sidecar is not None:
            headers["X-Detection-Sidecar"] = encode_sidecar_header(sidecar)
        url = f"{self.base_url}/v1/{quote(account)}/{quote(container)}/{quote(name)}"
        resp = self._session.put(url, data=data, headers=self._headers(headers),
                                 timeout=self.timeout)
        return resp.status_code, _json_or_empty(resp)

    def get_object(self, url_path: str) -> tuple[int, bytes, dict]:
        resp = self._session.get(
            f"{self.base_url}{quote(url_path)}", headers=self._headers(),
            timeout=self.timeout,
        )
        return resp.status_code, resp.content, dict(resp.headers)

    def delete_object(self, url_path: str) -> int:
        resp = self._session.delete(
            f"{self.base_url}{quote(url_path)}", headers=self._headers(),
            timeout=self.timeout,
        )
        return resp.status_code

    def search(self, q: str, mode: str = "AND", limit: int = 50,
               content_type: str | None = None,
               container: str | None = None) -> dict:
        params = {"q": q, "mode": mode, "limit": str(limit)}
        if content_type:
            params["type"] = content_type
        if container:
            params["container"] = container
        resp = self._session.get(
            f"{self.base_url}/v1/search", params=params, headers=self._headers(),
            timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.json()

    def suggest(self, prefix: str, n: int = 10) -> list[str]:
        resp = self._session.get(
            f"{self.base_url}/v1/suggest", params={"prefix": prefix, "n": str(n)},
            headers=self._headers(), timeout=self.timeout,
        )
        resp.raise_for_status()
        return resp.json()["terms"]


def _json_or_empty(resp) -> dict:
    try:
        return resp.json()
    except ValueError:
        return {}
