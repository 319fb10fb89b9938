"""Read-only HTTP/JSON feed over the news store."""

from __future__ import annotations

from fastapi import Depends, FastAPI, HTTPException, Query

from .feed import to_feed_obj
from .store import GraphStore


def create_app(store_path: str) -> FastAPI:
    app = FastAPI(title="editnews feed")

    # One connection per request; WAL gives each a committed snapshot.
    def get_store():
        store = GraphStore(store_path)
        try:
            yield store
        finally:
            store.close()

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.get("/news")
    def list_news(
        category: str | None = None,
        limit: int | None = Query(default=None, ge=0),
        store: GraphStore = Depends(get_store),
    ):
        return [to_feed_obj(i) for i in store.list_news(category=category, limit=limit)]

    @app.get("/news/{item_id}")
    def get_news(item_id: str, store: GraphStore = Depends(get_store)):
        item = store.get_news(item_id)
        if item is None:
            raise HTTPException(status_code=404, detail=f"no news item {item_id}")
        return to_feed_obj(item)

    @app.get("/runs/{run_id}")
    def get_run(run_id: str, store: GraphStore = Depends(get_store)):
        run = store.get_run(run_id)
        if run is None:
            raise HTTPException(status_code=404, detail=f"no run {run_id}")
        return run

    return app


def serve(store_path: str, host: str = "127.0.0.1", port: int = 8080):
    import uvicorn

    uvicorn.run(create_app(store_path), host=host, port=port)
