#!/usr/bin/env python3
"""
Tests for the HTTP surface.
"""

import pytest
from fastapi.testclient import TestClient

from src.api import app
from src.scenario_io import builtin, scenario_document


@pytest.fixture
def client():
    with TestClient(app) as c:
        yield c


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json()["status"] == "healthy"
    assert response.json()["builtins"] == 3


def test_builtins(client):
    assert client.get("/builtins").json() == ["example1", "monty_hall", "walley_coins"]
    assert client.get("/builtins/walley_coins").json() == scenario_document(builtin("walley_coins"))
    assert client.get("/builtins/three_prisoners").status_code == 404


def test_solve_apriori(client):
    response = client.post("/solve/apriori", json={"builtin": "monty_hall", "certify": True})

    assert response.status_code == 200
    body = response.json()
    assert body["value"]["exact"] == "1/3"
    assert body["certificate"]["passed"] is True
    assert body["oracle"]["passed"] is True


def test_solve_aposteriori(client):
    response = client.post("/solve/aposteriori", json={"builtin": "example1", "observation": "1"})

    assert response.status_code == 200
    assert response.json()["value"]["exact"] == "1/2"


def test_inline_scenario(client):
    document = scenario_document(builtin("example1"))
    response = client.post("/solve/apriori", json={"scenario": document})

    assert response.status_code == 200
    assert response.json()["value"]["exact"] == "1/3"


def test_checks(client):
    assert client.post("/check/hull", json={"builtin": "example1"}).json()["equals_hull"] is False
    assert client.post("/check/ignore", json={"builtin": "monty_hall"}).json()["holds"] is False
    assert client.post("/check/dilation", json={"builtin": "walley_coins"}).json()["dilates"] is True

    calibration = client.post("/check/calibration",
                              json={"builtin": "monty_hall", "partition": "singletons"}).json()
    assert calibration["calibrated"] is True
    assert [r["observations"] for r in calibration["ranges"]] == [["G2"], ["G3"]]


def test_detect_inconsistency(client):
    body = client.post("/detect/inconsistency", json={"builtin": "monty_hall"}).json()
    assert body["flagged"] is True
    assert body["act_divergence"] is False
    assert body["value_divergence"] is True


def test_sharp_partitions(client):
    body = client.post("/sharp-partitions", json={"builtin": "walley_coins"}).json()
    assert body["count"] == 2

    body = client.post("/sharp-partitions",
                       json={"builtin": "walley_coins", "compare_marginals": True}).json()
    assert body["count"] == 1
    assert body["partitions"] == [{"cells": "{H, T}"}]


@pytest.mark.parametrize("path, payload, status", [
    ("/solve/apriori", {"builtin": "three_prisoners"}, 404),
    ("/solve/apriori", {}, 422),
    ("/solve/apriori", {"builtin": "example1", "scenario": {}}, 422),
    ("/solve/apriori", {"scenario": {"name": "empty"}}, 422),
    ("/solve/aposteriori", {"builtin": "example1", "observation": "7"}, 422),
    ("/check/calibration", {"builtin": "example1", "partition": "halves"}, 422),
    ("/sharp-partitions", {"builtin": "walley_coins", "max_partition_size": 1}, 413),
])
def test_error_statuses(client, path, payload, status):
    assert client.post(path, json=payload).status_code == status


def test_invalid_inline_vertex(client):
    document = scenario_document(builtin("walley_coins"))
    document["vertices"][0] = [["1/2", "0"], ["0", "2/5"]]

    response = client.post("/solve/apriori", json={"scenario": document})
    assert response.status_code == 422
    assert "sums to 9/10" in response.json()["detail"]
