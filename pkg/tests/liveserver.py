"""Run the service under real uvicorn on a loopback port.

The in-process test client in this environment cannot abandon an unfinished
streaming response, so server-sent-event tests talk to an actual socket;
closing it is a genuine disconnect the server can observe.
"""

import socket
import threading
import time

import uvicorn

from seatbid.service.app import create_app
from seatbid.service.runtime import ServiceRuntime


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class LiveService:
    def __init__(self, runtime: ServiceRuntime):
        self.runtime = runtime
        self.port = free_port()
        config = uvicorn.Config(
            create_app(runtime),
            host="127.0.0.1",
            port=self.port,
            log_level="warning",
            lifespan="off",
        )
        self.server = uvicorn.Server(config)
        self._thread = threading.Thread(target=self.server.run, daemon=True)

    @property
    def base_url(self) -> str:
        return f"http://127.0.0.1:{self.port}"

    def __enter__(self):
        self._thread.start()
        deadline = time.time() + 10
        while not self.server.started:
            if time.time() > deadline:
                raise RuntimeError("uvicorn did not start")
            time.sleep(0.01)
        return self

    def __exit__(self, *exc_info):
        self.server.should_exit = True
        self._thread.join(timeout=10)
        self.runtime.close()
        return False
