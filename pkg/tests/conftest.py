import hashlib

import pytest

from panchain.crypto import generate_keypair


def keypair(label: str):
    return generate_keypair(hashlib.sha256(label.encode()).digest())


@pytest.fixture
def sender_key():
    return keypair("sender")


@pytest.fixture
def recipient_key():
    return keypair("recipient")


@pytest.fixture
def observer_keys():
    return [keypair(f"observer-{i}") for i in range(3)]
