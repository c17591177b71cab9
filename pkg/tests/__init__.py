"""Test suite for LiQUAR"""
