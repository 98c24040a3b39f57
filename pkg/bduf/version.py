# THIS FILE IS GENERATED FROM BDUF SETUP.PY
short_version = '0.1.0'
version = '0.1.0.dev'
release = False
