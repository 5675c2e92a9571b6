"""API package for routers and schemas."""
