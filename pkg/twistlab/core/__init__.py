"""Numeric core: characters, L-functions, q-series, asymptotics and identities."""
