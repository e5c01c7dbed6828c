"""Independent reference encodings used to freeze test vectors.

Builds OCSP and certificate structures with the `cryptography` package and
prints the resulting DER (plus the field values needed to rebuild them) as
hex, one `key=value` per line.
"""
import datetime
import hashlib

from cryptography import x509
from cryptography.hazmat.primitives import hashes, serialization
from cryptography.hazmat.primitives.asymmetric import ec
from cryptography.x509 import ocsp
from cryptography.x509.oid import NameOID


def out(key, value):
    print(f"{key}={value.hex() if isinstance(value, bytes) else value}")


def name(cn):
    return x509.Name([
        x509.NameAttribute(NameOID.COMMON_NAME, cn),
        x509.NameAttribute(NameOID.ORGANIZATION_NAME, "OCSP Lab"),
    ])


def main():
    key = ec.derive_private_key(0x1234567, ec.SECP256R1())
    spki_der = key.public_key().public_bytes(serialization.Encoding.DER,
                                             serialization.PublicFormat.SubjectPublicKeyInfo)
    nb = datetime.datetime(2050, 1, 1, tzinfo=datetime.timezone.utc)
    na = datetime.datetime(2060, 1, 1, tzinfo=datetime.timezone.utc)
    issuer = (x509.CertificateBuilder()
              .subject_name(name("OCSP Lab Root CA")).issuer_name(name("OCSP Lab Root CA"))
              .public_key(key.public_key()).serial_number(1000)
              .not_valid_before(nb).not_valid_after(na)
              .add_extension(x509.BasicConstraints(ca=True, path_length=None), critical=True)
              .sign(key, hashes.SHA256()))
    out("cert_tbs", issuer.tbs_certificate_bytes)
    out("cert_spki", spki_der)
    out("cert_sig_alg", issuer.signature_algorithm_oid.dotted_string)

    leaf = (x509.CertificateBuilder()
            .subject_name(name("leaf")).issuer_name(issuer.subject)
            .public_key(key.public_key()).serial_number(7)
            .not_valid_before(nb).not_valid_after(na)
            .sign(key, hashes.SHA256()))
    this_update = datetime.datetime(2016, 8, 1, 12, 0, 0, tzinfo=datetime.timezone.utc)
    next_update = datetime.datetime(2016, 8, 1, 13, 0, 0, tzinfo=datetime.timezone.utc)
    resp = (ocsp.OCSPResponseBuilder()
            .add_response(cert=leaf, issuer=issuer, algorithm=hashes.SHA1(),
                          cert_status=ocsp.OCSPCertStatus.GOOD, this_update=this_update,
                          next_update=next_update, revocation_time=None, revocation_reason=None)
            .responder_id(ocsp.OCSPResponderEncoding.HASH, issuer)
            .sign(key, hashes.SHA256()))
    out("resp_tbs", resp.tbs_response_bytes)
    out("resp_produced_at", resp.produced_at_utc.strftime("%Y-%m-%dT%H:%M:%SZ"))
    out("resp_key_hash", resp.responder_key_hash)
    out("resp_name_hash", resp.issuer_name_hash)
    out("resp_issuer_key_hash", resp.issuer_key_hash)

    req = ocsp.OCSPRequestBuilder().add_certificate(leaf, issuer, hashes.SHA1()).build()
    out("req", req.public_bytes(serialization.Encoding.DER))
    out("sha1_abc", hashlib.sha1(b"abc").digest())
    out("toy32_empty", hashlib.sha256(b"").digest()[:4])


if __name__ == "__main__":
    main()
